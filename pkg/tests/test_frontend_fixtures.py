"""Guard: the committed frontend fixtures match what the code generates."""

import importlib.util
import json
import os

HERE = os.path.dirname(__file__)
SCRIPT = os.path.join(HERE, "..", "scripts", "gen_frontend_fixtures.py")
FIXDIR = os.path.join(HERE, "..", "frontend", "test", "fixtures")


def load_generator():
    spec = importlib.util.spec_from_file_location("genfix", SCRIPT)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def test_frontend_fixtures_are_current():
    mod = load_generator()
    for name, expected in mod.fixtures().items():
        path = os.path.join(FIXDIR, name)
        assert os.path.exists(path), f"{name} missing; run scripts/gen_frontend_fixtures.py"
        with open(path, encoding="utf-8") as fh:
            on_disk = json.load(fh)
        assert on_disk == expected, f"{name} stale; run scripts/gen_frontend_fixtures.py"
