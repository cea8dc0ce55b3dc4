"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the pure-Python
twin is the fallback.  ``JETCAT_KERNEL=python`` or ``JETCAT_KERNEL=c`` forces
a backend (the latter raises if the extension is unavailable).  Both backends
compute identical exact results; only speed differs.
"""

import os

_forced = os.environ.get("JETCAT_KERNEL", "").strip().lower()
if _forced not in ("", "c", "python"):
    raise RuntimeError(
        "JETCAT_KERNEL must be 'c' or 'python', got %r" % (_forced,)
    )

if _forced == "python":
    from jetcat import _kernel_py as _impl

    BACKEND = "python"
else:
    try:
        from jetcat import _kernel_c as _impl  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        if _forced == "c":
            raise RuntimeError(
                "JETCAT_KERNEL=c but the compiled kernel is not built; "
                "run `pip install -e .` (or `python setup.py build_ext --inplace`)"
            )
        from jetcat import _kernel_py as _impl

        BACKEND = "python"

mono_mul = _impl.mono_mul
add_terms = _impl.add_terms
sub_terms = _impl.sub_terms
neg_terms = _impl.neg_terms
scale_terms = _impl.scale_terms
mul_terms = _impl.mul_terms
pow_terms = _impl.pow_terms


def kernel_backend():
    """Name of the active kernel backend: 'c' or 'python'."""
    return BACKEND
