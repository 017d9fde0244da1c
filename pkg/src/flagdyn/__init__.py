"""Root combinatorics, Lyapunov and Morse spectra, hyperbolicity verdicts and chain graphs
for right-invariant control systems on flag manifolds of split groups."""

from .lie import (
    AlgebraSpec,
    CartanVector,
    FlagType,
    LieError,
    PiTriple,
    RootFunctional,
    WeylElement,
    all_roots,
    bundle_dims,
    double_cosets,
    generated_roots,
    invariant_inner,
    pi_sets,
    theta_of,
)
from .cocycle import (
    BilinearControlSystem,
    CocycleTrail,
    ControlSignal,
    IntegrationError,
    UnresolvedSpectrumError,
    a_cocycle,
    asymptotic_ray,
    evolve_trail,
    integrate_step,
    oseledets,
    polar_exponent,
    projective_derivative_exponent,
)
from .spectrum import (
    SamplingPlan,
    ScalarSpectrum,
    SpectrumPolytope,
    center_symmetrize,
    entropy_lower_bound,
    estimate_attractor_polytope,
    infer_flag_type,
    regular_lyapunov_spectrum,
    scalar_spectrum,
)
from .classify import (
    ChainControlSetDescriptor,
    Classification,
    Verdict,
    classify,
    describe,
    sl3_case_report,
    zero_flag_report,
)
from .chain import CellComplex, ChainGraph, MorseGraph, build_chain_graph, chain_components, component_extent

__version__ = "0.1.0"
