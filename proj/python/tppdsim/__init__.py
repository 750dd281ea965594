from tppdsim._core import *  # noqa: F401,F403
from tppdsim._core import __doc__  # noqa: F401
