"""Online hierarchical Kraft allocation, its contaminated-space variant and
the hierarchical prefix codes built on top of it."""

from .codec import (
    CodeBook,
    EncodeFailure,
    InvalidLengthFunction,
    build_codebook,
    check_use_bound,
    decode,
    encode,
    load_length_function,
    tabulate,
)
from .contam import ContaminationSet, InsuranceLedger
from .dyadic import DyadicAmount, DyadicInterval, LedgerUnderflow, Relation
from .events import Alloc, Burn, Error
from .hier import ROOT, AuditReport, RequestTree, audit, new_tree
from .kraft import FreeList, KraftViolation, allocate_sequence, new_allocator
from .stream import Contam, Req, StreamFormatError, format_log, parse_log, parse_stream, run_stream
from .verify import (
    StepAuditor,
    StreamSpec,
    brute_force_feasible,
    exhaustive_agreement,
    first_kraft_overflow,
    kraft_chaitin_equiv,
    random_stream,
    replay_audit,
)

__version__ = "0.1.0"
