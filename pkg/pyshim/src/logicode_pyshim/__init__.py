"""Foreign-runtime execution shim.

Runs untrusted generated Python analysis functions in an isolated child
process. The child sees only an Image proxy object; every query it makes
travels over a length-prefixed JSON protocol to the host, which answers
from a static fact table. One child per evaluation, killed on timeout.
"""

from .host import (  # noqa: F401
    FactTableServer,
    ProtocolError,
    ShimCrash,
    ShimExecutionError,
    ShimSession,
    ShimTimeout,
    shim_evaluate,
)

__version__ = "0.1.0"
