"""Backend selection for the separable transform engine.

At import we try the compiled extension (``cesradon._fastpath``) and fall
back to the pure-numpy implementation if it is missing or fails to load.
Set ``CESRADON_FORCE_FALLBACK=1`` to skip the extension even when built —
useful for A/B timing and for debugging suspected extension issues.
"""

import os

from . import _slowpath

if os.environ.get("CESRADON_FORCE_FALLBACK"):
    _impl = _slowpath
else:
    try:
        from . import _fastpath as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _slowpath

BACKEND = _impl.BACKEND_NAME

build_axes = _slowpath.build_axes
mass_rows = _impl.mass_rows
profit_rows = _impl.profit_rows
