"""Let the smoke tests run either against an installed `divsamp` package or,
when the package is not installed, against the CMake build tree."""

import pathlib
import sys

try:
    import divsamp  # noqa: F401
except ImportError:
    root = pathlib.Path(__file__).resolve().parents[2]
    build = root / "build"
    candidates = sorted(build.glob("_core*.so"))
    if not candidates:
        raise ImportError(
            "divsamp is not installed and no _core extension was found under build/; "
            "run `pip install .` or `cmake -B build && cmake --build build` first"
        )
    sys.path.insert(0, str(build))
    import _core

    sys.modules["divsamp._core"] = _core
    sys.path.insert(0, str(root / "python"))
    import divsamp  # noqa: F401
