"""Exact HeLP-method toolkit for torsion units of integral group rings.

Given the ordinary (and optionally Brauer) character table of a finite
group, the package enumerates all partial-augmentation vectors of
hypothetical torsion units that survive the HeLP eigenvalue-multiplicity
constraints, entirely in exact rational/cyclotomic arithmetic, and derives
verdicts on rational conjugacy questions from the survivors.
"""

from .chartab import (
    BrauerBlock,
    CharacterTable,
    Character,
    ClassFusion,
    ConjugacyClass,
    TableError,
    bundled_names,
    bundled_table,
    load_fusion,
    load_table,
    power_class,
)
from .cyclotomic import (
    Cyclotomic,
    CyclotomicParseError,
    Rational,
    conductor,
    galois,
    parse_cyclotomic,
    render_cyclotomic,
    root_of_unity,
    trace_to_rational,
)
from .helpcore import (
    AffineForm,
    HelpError,
    HelpOptions,
    LinearSystem,
    PAVector,
    PowerChain,
    build_system,
    candidate_classes,
    chi_of_power,
    multiplicity_form,
)
from .intsolve import DEFAULT_NODE_CAP, SolutionSet, enumerate_solutions
from .verdicts import (
    GroupAnalysis,
    GroupVerdict,
    IncompleteReport,
    InvariantError,
    KernelFindings,
    OrderReport,
    WitnessReport,
    character_is_faithful,
    character_is_rational,
    dump_document,
    eigenvalue_profile,
    enumerate_chains,
    kernel_check,
    parse_report_document,
    pq_report,
    quotient_choices_from_document,
    render_diagonal,
    report_document,
    sipc_report,
    torsion_free_witness,
    zc1_report,
)

__version__ = "0.1.0"
