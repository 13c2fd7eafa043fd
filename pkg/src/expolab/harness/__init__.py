from .metrics import DEFAULT_EPSILON, convergence_index, frames_to_converge
