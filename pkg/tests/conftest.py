"""Shared fixtures: the kernel backends available in this build."""

import pytest

from diracgap import _fallback


def _available_backends():
    backends = [_fallback]
    try:
        from diracgap import _kernels
        backends.append(_kernels)
    except ImportError:
        pass
    return backends


@pytest.fixture(params=_available_backends(),
                ids=lambda mod: mod.BACKEND_NAME)
def backend(request):
    """Each kernel implementation in turn (pure python, compiled if built)."""
    return request.param
