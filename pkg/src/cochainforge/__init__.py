"""Symbolic twisting cochains and characteristic classes for GL(n)-bundles.

Exact-rational graded-commutative kernel, the polynomial de Rham Hopf
algebra of GL(n), Cech-de Rham complexes over finite nerves, twisting
cochains with machine-checked Maurer-Cartan certificates, characteristic
cocycles, homological perturbation machinery, simplicial form realizations,
cyclic characters, and a floating-point holonomy oracle.  The ``forge``
command line drives batch verification and numeric pairing.
"""

from .graded import Algebra, Derivation, GradedExpr, make_algebra
from .grouphopf import GroupAlgebra
from .cech import CechComplex, ConnectionData, Nerve, TransitionCocycle
from .twist import (GaugeMap, TwistingCochain, build_phi_P, build_xi,
                    gauge_act, gauge_homotopy, twisted_diff)
from .charclasses import (WeilAlgebra, c1_cocycle, c2_cocycle, char_map,
                          chern_weil, cs_comparison, transgress)
from .hpt import AInfinityTransfer, cech_sdr, perturb, push_cochain
from .dupont import build_v, build_w, simplex_forms, simplex_integrate
from .loopops import (ProjectorData, b_plus_uB, ch_cochain, ch_projector,
                      loop_map, psi_tilde_star)
from .holonomy import (NumericConnection, SampledPath, chen_series,
                       holonomy_ode, monodromy_map)

__all__ = [name for name in dir() if not name.startswith("_")]
