"""Generalized Fourier-Feynman transforms and convolution products for cylinder
functionals on Wiener space, with identity verifiers and a Monte Carlo oracle."""

from .functionals import (
    CylinderFunctional,
    SamplePath,
    canonicalize,
    evaluate,
    evaluate_many,
    measures_equal,
    product,
    pwz_integral,
    scale_argument,
)
from .kernels import (
    Grid,
    KernelFn,
    SystemSolutionSet,
    builtin_family,
    check_system,
    l2_inner,
    l2_norm,
    s_combine,
)
from .oracle import (
    McConfig,
    McEstimate,
    check_variance_of_Zs,
    closed_form_wiener_integral,
    mc_generalized_wiener_integral,
    sample_brownian,
)
from .transforms import (
    ConvolutionSpec,
    MixedChainSpec,
    TransformSpec,
    gcp,
    gfft,
    gfft_inverse,
    iterated_gfft,
)

__version__ = "0.1.0"
