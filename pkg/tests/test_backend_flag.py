import os
import subprocess
import sys

SCRIPT = """
from bracketsums import _accel, make_context
from bracketsums.expsum import PhaseSpec, exp_sum
print(_accel.backend_name(), repr(exp_sum(200000, PhaseSpec.from_real(0.37), make_context(2)).value))
"""


def run_with(backend):
    env = dict(os.environ, BRACKETSUMS_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return out.stdout.split(maxsplit=1)


def test_env_flag_selects_backend_and_results_agree():
    name_np, val_np = run_with("numpy")
    name_nb, val_nb = run_with("numba")
    assert name_np == "numpy" and name_nb == "numba"
    assert abs(complex(val_np) - complex(val_nb)) < 1e-14
