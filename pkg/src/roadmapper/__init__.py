"""Reasoning engine for mixed-variable requirements databases.

Parses `.req` requirements databases, enumerates valid configurations,
derives adaptation operators between them, and ranks configurations and
roadmaps under pluggable decision rules.
"""

from .configuration import (
    Configuration,
    EnumerationResult,
    PropertyReport,
    check_configuration,
    enumerate_configurations,
)
from .errors import RoadmapperError
from .inference import Closure, closure, entails, is_consistent
from .model import (
    BinOp,
    Compare,
    Conflict,
    Const,
    Distributed,
    ExpDecay,
    Implication,
    Modality,
    Normal,
    PiecewiseLinear,
    PlateauThenDecay,
    Preference,
    PreferenceKind,
    ProbCompare,
    PropVar,
    QuantVar,
    Requirement,
    RequirementsDatabase,
    SimpleProp,
    SimpleQuant,
    Softgoal,
    Sort,
    VagueProp,
    Var,
    add_requirement,
    build_database,
    select,
)
from .operationalization import (
    Operationalization,
    SatisfactionClosure,
    is_admissible,
    qualitative_operationalizations,
    quantitative_operationalizations,
    satisfaction_closure,
)
from .parser import ParseDiagnostic, ParseResult, SourceSpan, load_file, parse, serialize
from .quanteval import eval_condition, eval_expr, normal_cdf, sat_value, val
from .roadmap import (
    AdaptationRequirement,
    MaximizeValue,
    MaximizeValueThenPreferences,
    MinimizeValue,
    Roadmap,
    RoadmapValueSum,
    apply_adaptation,
    build_roadmaps,
    derive_adaptation,
    pairwise_value_preference,
    rank_configurations,
    rank_roadmaps,
)
from .transforms import (
    RewriteReport,
    add_satisfaction_product,
    expand_value_conflicts,
    expand_value_preferences,
    refine_softgoal,
    relax_fuzzy,
    relax_fuzzy_upper_bound,
    relax_probabilistic,
)

__version__ = "0.1.0"
