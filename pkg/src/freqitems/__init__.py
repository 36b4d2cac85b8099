"""Approximate frequent-items summaries for weighted data streams.

The core type is Sketch: k counters in an open-addressing table, bulk
decrements driven by a selected counter rank, and a running offset that
turns decrement history into upper bounds.  ExactRank selects the true
k*-th largest counter; SampledQuantile estimates it from a fixed-size
with-replacement sample.  Sketches of the same family merge by replaying
one table into the other, and survive serialize/deserialize round trips.

baselines holds reference summaries the benchmarks compare against;
oracle, streamgen, and bench provide exact counting, synthetic streams,
and the measurement engines behind the `freqitems` command line tool.
"""

from .baselines import (MGSummary, MHESummary, RBMCSummary, RTUCMGSummary,
                        RTUCSSSummary, SSSummary, ach_merge_quickselect,
                        ach_merge_sort)
from .counter_table import CounterTable, UpsertStatus
from .oracle import ExactCounts
from .sketch import (ErrorMode, ExactRank, Row, SampledQuantile, Sketch,
                     SketchDecodeError)
from .streamgen import (Constant, Stream, StreamUpdate, UniformInt, ZipfSpec,
                        read_stream, write_stream, zipf_probabilities,
                        zipf_stream)

__version__ = "0.1.0"

__all__ = [
    "CounterTable",
    "UpsertStatus",
    "Sketch",
    "ExactRank",
    "SampledQuantile",
    "ErrorMode",
    "Row",
    "SketchDecodeError",
    "MGSummary",
    "SSSummary",
    "MHESummary",
    "RBMCSummary",
    "RTUCMGSummary",
    "RTUCSSSummary",
    "ach_merge_sort",
    "ach_merge_quickselect",
    "ExactCounts",
    "Stream",
    "StreamUpdate",
    "ZipfSpec",
    "Constant",
    "UniformInt",
    "zipf_stream",
    "zipf_probabilities",
    "read_stream",
    "write_stream",
    "__version__",
]
