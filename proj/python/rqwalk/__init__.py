from rqwalk._core import *  # noqa: F401,F403
from rqwalk._core import __version__  # noqa: F401
