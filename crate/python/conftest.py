"""Makes the built extension importable as `wreathkit` when it is not installed."""

import importlib.machinery
import importlib.util
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def _load_built():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libwreathkit.so"
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("wreathkit", str(lib))
            spec = importlib.util.spec_from_file_location("wreathkit", lib, loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            sys.modules["wreathkit"] = module
            return
    raise ImportError("build the extension first: cargo build --release -p wreathkit-py")


try:
    import wreathkit  # noqa: F401
except ImportError:
    _load_built()
