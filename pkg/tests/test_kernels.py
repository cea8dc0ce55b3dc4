"""Both kernel backends compute identical exact results."""

import os
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetcat import _kernel, _kernel_py
from jetcat.poly import Variable

try:
    from jetcat import _kernel_c
except ImportError:  # pragma: no cover
    _kernel_c = None

needs_compiled = pytest.mark.skipif(_kernel_c is None, reason="compiled kernel not built")

_VARS = [Variable.base(0), Variable.base(1), Variable.jet(0, (1, 0)), Variable.eps(0)]


@st.composite
def term_maps(draw):
    out = {}
    for _ in range(draw(st.integers(0, 5))):
        mono = {}
        for v in draw(st.lists(st.sampled_from(_VARS), max_size=3)):
            mono[v] = mono.get(v, 0) + 1
        coeff = Fraction(draw(st.integers(-8, 8)), draw(st.integers(1, 3)))
        if coeff:
            out[tuple(sorted(mono.items()))] = coeff
    return out


@needs_compiled
@given(term_maps(), term_maps())
@settings(max_examples=200, deadline=None)
def test_backends_agree(a, b):
    assert _kernel_py.mul_terms(a, b) == _kernel_c.mul_terms(a, b)
    assert _kernel_py.add_terms(a, b) == _kernel_c.add_terms(a, b)
    assert _kernel_py.sub_terms(a, b) == _kernel_c.sub_terms(a, b)
    assert _kernel_py.neg_terms(a) == _kernel_c.neg_terms(a)
    assert _kernel_py.scale_terms(a, Fraction(3, 2)) == _kernel_c.scale_terms(a, Fraction(3, 2))
    assert _kernel_py.pow_terms(a, 3) == _kernel_c.pow_terms(a, 3)


@needs_compiled
def test_mono_mul_merges_sorted():
    x, y = Variable.base(0), Variable.base(1)
    m1 = ((x, 2),)
    m2 = ((x, 1), (y, 3))
    for impl in (_kernel_py, _kernel_c):
        assert impl.mono_mul(m1, m2) == ((x, 3), (y, 3))
        assert impl.mono_mul((), m1) == m1


def test_forced_python_backend():
    env = dict(os.environ, JETCAT_KERNEL="python")
    out = subprocess.run(
        [sys.executable, "-c", "import jetcat; print(jetcat.kernel_backend())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"


def test_bad_backend_rejected():
    env = dict(os.environ, JETCAT_KERNEL="rust")
    out = subprocess.run(
        [sys.executable, "-c", "import jetcat"],
        capture_output=True, text=True, env=env,
    )
    assert out.returncode != 0
    assert "JETCAT_KERNEL" in out.stderr


def test_active_backend_exports():
    for name in ("mono_mul", "add_terms", "mul_terms", "pow_terms"):
        assert hasattr(_kernel, name)
