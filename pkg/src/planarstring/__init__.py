"""Soliton synthesis, world-sheet reconstruction, charges and cusp braids of
the planar relativistic string."""

from .braid import BraidWord, braid_word, classify
from .charges import ChargeSet, F_J, F_P, angular_J, compute_charges, hamiltonian, momentum
from .chiral_field import (DEFAULT_TOL, MINUS, PLUS, ChiralField, ExternalVariables, GridSpec,
                           Tolerances, evolve, field_from_samples, integral_I, sech_sum_field,
                           soliton_field, topological_charge, zero_field)
from .cusps import CuspEvent, CuspLine, cusp_positions, track
from .errors import (ConstraintError, ConvergenceError, CuspError, DecayError,
                     EigenvalueSearchError, GridError, NumericalError, PlanarStringError,
                     QuantizationError, SingularSystemError, TrackingError, ValidationError)
from .scattering import (DiscreteSpectrum, MonodromyData, find_eigenvalues, forward_scatter,
                         imaginary_spectrum, norming_constants, parity_check, recover_spectrum,
                         synth_nsoliton)
from .worldsheet import (Embedding, FundamentalForms, WorldSheet, delta_e, forms,
                         integral_curvature, phi, reconstruct, tangent)

__version__ = "0.1.0"
