from ._qsde import *  # noqa: F401,F403
from ._qsde import __version__  # noqa: F401
