"""Index theory of symplectic paths."""
from .cz import (IndexReport, MeanIndex, admissible, clockwise_unit_angles, cz_index,
                 exp_unit_angles, index_report, maslov_index, mean_from_cz, mean_index,
                 rotation_rate)
from .paths import SymplecticPath, iterate_path
from .primes import PrimeSequence, admissible_primes, prime_sequence
from .twist import (SupportInterval, Theorem2Report, TwistGap, TwistLedger, case1_min_m,
                    support_interval, twist_gap_ledger,
                    theorem2_case_analysis, twist_gap_check)
