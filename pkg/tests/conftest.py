'''

The app fixture calls the factory with a test config, so the tests never
pick up a local instance config.py. TESTING tells Flask that the app is in
test mode. The instance folder is pointed at pytest's tmp_path so report
files and the folder the factory creates stay out of the source tree.

The runner fixture is app.test_cli_runner(), which can call the click
commands registered with the application by name.

The numerical fixtures hand out fixed-seed sample points. Every test that
draws random points takes them from here, so a failure reproduces exactly.

Pytest matches fixtures by the names of the arguments in the test
functions.

'''

import numpy as np
import pytest

from fbiharm import create_app
from fbiharm.numdiff import annulus_samples


@pytest.fixture
def app(tmp_path, monkeypatch):
    for name in ('FBIHARM_SEED', 'FBIHARM_TOLERANCE', 'FBIHARM_FD_STEP', 'FBIHARM_FORMAT'):
        monkeypatch.delenv(name, raising=False)
    app = create_app({
        'TESTING': True,
    })
    app.instance_path = str(tmp_path)
    return app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def annulus_points():
    return annulus_samples(3, 10, 0.5, 2.0, seed=42)
