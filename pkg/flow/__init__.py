from .integrator import Trajectory, check_conservation, integrate
from .first_return import ReturnData, first_return, return_data
from .rotation import LoopRotation, delta_rotation_loop, rotation_along_loop, rotation_number
from .cycles import WindingReport, abelian_rotation, cut_integral, winding_check, winding_numbers
from .quasi import (
    QuasiTransit,
    fiber_point,
    quasi_delta_rotation,
    quasi_relative_rotation,
    quasi_rotation_closed_form,
    quasi_sweep,
    quasi_transit,
    quasi_transit_from_state,
)
