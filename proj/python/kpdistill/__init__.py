try:
    from ._kpdistill import *  # noqa: F401,F403
except ImportError:
    from _kpdistill import *  # noqa: F401,F403
