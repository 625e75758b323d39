#include "qsde/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace qsde {

namespace {

constexpr char kTrajectoryMagic[8] = {'Q', 'S', 'D', 'E', 'T', 'R', 'J', '1'};

void write_f64(std::ofstream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ofstream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
double read_f64(std::ifstream& is) {
    double v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::uint64_t read_u64(std::ifstream& is) {
    std::uint64_t v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw IoError("cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
    if (!is) throw IoError("cannot open for reading: " + path);
    return is;
}

// Shortest round-trip decimal form.
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    return fields;
}

double parse_number(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("cannot parse number '" + s + "' in " + context);
    }
}

}  // namespace

void write_trajectory_binary(const std::string& path,
                             const Trajectory& traj) {
    auto os = open_out(path, true);
    os.write(kTrajectoryMagic, sizeof kTrajectoryMagic);
    write_f64(os, traj.params.eta);
    write_f64(os, traj.params.lambda);
    write_f64(os, traj.params.epsilon);
    write_f64(os, traj.params.r0);
    write_f64(os, traj.params.sigma);
    write_f64(os, traj.config.kappa);
    write_f64(os, traj.config.x_init);
    write_f64(os, traj.config.t_end);
    write_u64(os, traj.config.burn_in);
    write_u64(os, traj.config.max_steps);
    write_u64(os, traj.seed);
    write_u64(os, traj.times.size());
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        write_f64(os, traj.times[k]);
        write_f64(os, traj.values[k]);
    }
    if (!os) throw IoError("write failed: " + path);
}

Trajectory read_trajectory_binary(const std::string& path) {
    auto is = open_in(path, true);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kTrajectoryMagic, sizeof magic) != 0) {
        throw IoError("not a trajectory file: " + path);
    }
    Trajectory traj;
    traj.params.eta = read_f64(is);
    traj.params.lambda = read_f64(is);
    traj.params.epsilon = read_f64(is);
    traj.params.r0 = read_f64(is);
    traj.params.sigma = read_f64(is);
    traj.config.kappa = read_f64(is);
    traj.config.x_init = read_f64(is);
    traj.config.t_end = read_f64(is);
    traj.config.burn_in = read_u64(is);
    traj.config.max_steps = read_u64(is);
    traj.seed = read_u64(is);
    traj.config.seed = traj.seed;
    const std::uint64_t n = read_u64(is);
    traj.times.resize(n);
    traj.values.resize(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        traj.times[k] = read_f64(is);
        traj.values[k] = read_f64(is);
    }
    if (!is) throw IoError("truncated trajectory file: " + path);
    return traj;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto os = open_out(path);
    os << "t,x\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << fmt(traj.times[k]) << ',' << fmt(traj.values[k]) << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

Trajectory read_trajectory_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty file: " + path);
    Trajectory traj;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 2) throw IoError("malformed row in " + path);
        traj.times.push_back(parse_number(fields[0], path));
        traj.values.push_back(parse_number(fields[1], path));
    }
    if (traj.times.empty()) throw IoError("no samples in " + path);
    return traj;
}

void write_series_csv(const std::string& path, const ReturnSeries& series) {
    auto os = open_out(path);
    const bool with_counts = !series.counts.empty();
    os << (with_counts ? "t,r,N\n" : "t,r\n");
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        os << fmt(double(i) * series.dt) << ',' << fmt(series.values[i]);
        if (with_counts) os << ',' << fmt(series.counts[i]);
        os << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

ReturnSeries read_series_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty file: " + path);
    ReturnSeries series;
    double prev_t = 0.0;
    bool first = true;
    double t0 = 0.0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 2) throw IoError("malformed row in " + path);
        const double t = parse_number(fields[0], path);
        series.values.push_back(parse_number(fields[1], path));
        if (fields.size() >= 3) {
            series.counts.push_back(parse_number(fields[2], path));
        }
        if (first) {
            t0 = t;
            first = false;
        } else if (series.values.size() == 2) {
            series.dt = t - t0;
        }
        prev_t = t;
    }
    (void)prev_t;
    if (series.values.empty()) throw IoError("no samples in " + path);
    series.meta = "file:" + path;
    return series;
}

void write_spectrum_csv(const std::string& path,
                        const SpectrumEstimate& spec) {
    auto os = open_out(path);
    os << "freq,power\n";
    for (std::size_t i = 0; i < spec.freqs.size(); ++i) {
        os << fmt(spec.freqs[i]) << ',' << fmt(spec.power[i]) << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

void write_pdf_csv(const std::string& path,
                   const std::vector<PdfPoint>& pdf) {
    auto os = open_out(path);
    os << "bin,density,count\n";
    for (const auto& p : pdf) {
        os << fmt(p.center) << ',' << fmt(p.density) << ','
           << p.count << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

namespace {

double parse_timestamp(const std::string& field, const std::string& path) {
    // Numeric epoch seconds, or ISO-8601 with 'T' or space separator.
    if (field.find_first_not_of("0123456789.+-eE") == std::string::npos) {
        return parse_number(field, path);
    }
    std::tm tm{};
    for (const char* pattern : {"%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"}) {
        std::istringstream ss(field);
        ss >> std::get_time(&tm, pattern);
        if (!ss.fail()) {
            return static_cast<double>(timegm(&tm));
        }
    }
    throw IoError("cannot parse timestamp '" + field + "' in " + path);
}

}  // namespace

std::vector<Tick> read_ticks_csv(const std::string& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty file: " + path);
    std::vector<Tick> ticks;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 2) throw IoError("malformed tick row in " + path);
        ticks.push_back(
            {parse_timestamp(fields[0], path), parse_number(fields[1], path)});
    }
    if (ticks.empty()) throw IoError("no ticks in " + path);
    return ticks;
}

void write_key_value(const std::string& path, const KeyValueMap& kv) {
    auto os = open_out(path);
    for (const auto& [key, value] : kv) {
        os << key << '=' << value << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

KeyValueMap read_key_value(const std::string& path) {
    auto is = open_in(path);
    KeyValueMap kv;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw IoError("malformed line '" + line + "' in " + path);
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace qsde
