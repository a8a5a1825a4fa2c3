# -*- coding: utf-8 -*-

from . import exc
from .discretization import QuadratureRule
from .discretization import SpatialGrid
from .discretization import GridFunction
from .discretization import inner_product
from .discretization import norm
from .discretization import laplacian
from .discretization import partial
from .discretization import gradient
from .discretization import divergence
from .discretization import difference_matrix
from .discretization import laplacian_matrix
from .discretization import write_grid_function
from .discretization import read_grid_function
from .observation import SensorArray
from .observation import ObservationOperator
from .observation import build_representers
from .observation import measure
from .observation import gram_A
from .observation import gram_B
from .observation import add_noise
from .observation import write_sensor_trajectory
from .pbdw import StabilityResult
from .pbdw import Reconstruction
from .pbdw import ErrorReport
from .pbdw import SweepMaxima
from .pbdw import stability_constant
from .pbdw import reconstruct
from .pbdw import projection
from .pbdw import error_report
from .pbdw import sweep_max
from .pbdw import hamiltonian_lipschitz_estimate
from .placement import PlacementConfig
from .placement import AscentState
from .placement import AscentResult
from .placement import grad_beta_sq
from .placement import grad_beta_sq_generic
from .placement import run_ascent
from .placement import sensors_update
from .placement import write_ascent_trace
from .models import ModelKind
from .models import ModelSpec
from .models import ParameterGrid
from .models import initial_condition
from .models import vector_field
from .models import hamiltonian
from .models import symplectic_apply
from .models import symplectic_inverse_apply
from .models import hump_location
from .highfidelity import TimeGrid
from .highfidelity import Trajectory
from .highfidelity import implicit_midpoint
from .highfidelity import midpoint_step
from .highfidelity import solve_trajectory
from .highfidelity import save_trajectory
from .highfidelity import load_trajectory
from .sdlr import OrthosymplecticBasis
from .sdlr import CoefficientEnsemble
from .sdlr import initialize
from .sdlr import retract
from .sdlr import dlr_rhs
from .sdlr import dlr_step
from .sdlr import dump_basis
from .config import load_config
from .config import load_transport_config
from .config import ExperimentConfig
from .config import TransportRunConfig
from .config import Mode
from .experiment import RunRecord
from .experiment import run
from .experiment import execute
from .experiment import emit_csv
from .experiment import generate_truths
from .experiment import transport_case
from .experiment import transport_basis
from .experiment import transport_beta_decay_demo
