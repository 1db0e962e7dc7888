from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    equality: float = 1e-12
    cptp: float = 1e-10
    convergence: float = 1e-8


DEFAULT_TOL = Tolerances()

# dense simulation limits (qubits)
MAX_CHANNEL_QUBITS = 12
MAX_STATE_QUBITS = 14
# full superoperators are (4**n)**2 complex entries
MAX_SUPEROP_QUBITS = 6
