"""Probability systems over finite event spaces: webs, forests, product and maximum-entropy extensions."""
from .event_space import (ConditionalTable, Descriptor, EventSpace, JointAssignment,
                          JointDistribution, MarginalTable, assignment_of, conditionalize,
                          conditionally_independent, entropy, index_of, marginalize)
from .exceptions import (CapacityError, ConvergenceError, DomainError, InconsistentSystemError,
                         ParseError, PreconditionError, ProbwebError, ValidationError)
from .extension import (ExtensionResult, ForestSearchResult, InfoReport, SolverConfig,
                        as_conditional_web, counterexample_system, information,
                        maxent_extension, most_informative_forest, product_extension,
                        verify_counterexample)
from .structure import (Classification, Component, Structure, TerminalSplit, classify, covered,
                        enumerate_subforests, terminal_split, unpack)
from .system import (ComponentTable, ConsistencyReport, ConstraintSet, ProbabilitySystem,
                     check_system, compatible, constraints, is_consistent, system_from_joint,
                     validate)
from .fileformat import (SystemFile, parse_joint, parse_system, parse_system_file, read_joint,
                         read_system, write_joint, write_system)
from .datasets import fixture_path, load_counterexample, load_inconsistent
from .estimators import ForestPruner, MaxEntExtension, ProductExtension, check_assignments

__version__ = "0.1.0"
