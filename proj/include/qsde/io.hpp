#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsde/return_model.hpp"
#include "qsde/sde.hpp"
#include "qsde/series.hpp"
#include "qsde/spectrum.hpp"

namespace qsde {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary trajectory record stream: magic + version header, parameter and
// seed block, then little-endian float64 (t, x) pairs.
void write_trajectory_binary(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_binary(const std::string& path);

// CSV forms: trajectory "t,x", series "t,r" or "t,r,N", spectrum
// "freq,power", pdf "bin,density,count".
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

void write_series_csv(const std::string& path, const ReturnSeries& series);
ReturnSeries read_series_csv(const std::string& path);

void write_spectrum_csv(const std::string& path,
                        const SpectrumEstimate& spec);
void write_pdf_csv(const std::string& path,
                   const std::vector<PdfPoint>& pdf);

// Tick CSV with header; columns: timestamp (integer epoch seconds or
// ISO-8601), price (decimal).
std::vector<Tick> read_ticks_csv(const std::string& path);

// Flat key=value manifest / config files.
using KeyValueMap = std::map<std::string, std::string>;
void write_key_value(const std::string& path, const KeyValueMap& kv);
KeyValueMap read_key_value(const std::string& path);

}  // namespace qsde
