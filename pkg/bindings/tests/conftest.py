import pytest

# The core suite must stay runnable without the binding package installed.
pytest.importorskip("dtcbf_bindings")
