"""Quadratic forms, Hamiltonians with quadratic behaviour at infinity and their composition calculus."""
from .capped import CappedPair, build_capped, cap_level, sup_difference
from .forms import QuadraticForm
from .growth import (GrowthConstants, forced_periodic_trajectories, growth_constants,
                     linear_growth_ratio)
from .hamiltonians import (CappedQuadratic, Hamiltonian, Iterated, PerturbedHamiltonian,
                           SumHamiltonian, Wedge, ZeroHamiltonian, bar, iterate, sharp, wedge)
from .integrate import action_along, flow, integrate
from .ledger import HalfOpen, IntervalLedger, interval_ledger
from .loops import (StructuredQuadratic, build_leQ_loop, build_pmu, check_nondeg_path)
from .orbits import (PeriodicOrbit, SearchResult, find_periodic_points, orbit_index,
                     pair_orbits, seed_grid, time_map)
from .perturbation import BumpTerm, CompactPerturbation, linear_payload_sup
from .profiles import Eta, Rho, SmoothingProfile
from .second_order import SecondOrderHamiltonian, companion_matrix, second_order_to_hamiltonian
