# SPDX-License-Identifier: MIT
"""
pywmeq - exact weak-mean pseudometric statistics on orbit segments, and
finite-horizon equicontinuity and sensitivity probes built on them.
"""

VERSION = "0.1.0"
VERSION_TUPLE = (0, 1, 0)

from .types import (  # noqa: E402
    ProbeConfig as ProbeConfig,
    SegmentStat as SegmentStat,
    StatKind as StatKind,
    SystemDescriptor as SystemDescriptor,
)
from .orbitstats import (  # noqa: E402
    besicovitch as besicovitch,
    estimate_limit as estimate_limit,
    pair_relation as pair_relation,
    segment_stat as segment_stat,
    sup_perm as sup_perm,
    weak_mean as weak_mean,
)
from .systems import orbit_segment as orbit_segment  # noqa: E402
from .classify import dichotomy_report as dichotomy_report  # noqa: E402
from .utils import ConfigError as ConfigError, InvariantError as InvariantError  # noqa: E402
