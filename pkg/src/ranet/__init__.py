"""Random Apollonian networks: generation, exact statistics and constants."""

from ranet.core import (
    MalformedTraceError,
    RanGraph,
    TriTree,
    generate_ran,
    generate_standard_subdivision,
    replay_trace,
    validate,
)

__version__ = "0.1.0"
