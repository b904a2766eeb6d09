import runpy
import sys
from pathlib import Path

import pytest

DEMOS = Path(__file__).resolve().parents[1] / "demos"


@pytest.mark.parametrize("name", ["01_local_estimator.py", "02_tuple_diffusion.py"])
def test_demo_runs(name, capsys):
    runpy.run_path(str(DEMOS / name), run_name="__main__")
    assert capsys.readouterr().out


def test_scenario_demo_short_horizon(monkeypatch, capsys):
    monkeypatch.setattr(sys, "argv", ["03_default_scenario.py", "100"])
    runpy.run_path(str(DEMOS / "03_default_scenario.py"), run_name="__main__")
    assert "round   100" in capsys.readouterr().out
