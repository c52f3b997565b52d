'''

There's not much to test about the factory itself. Most of the code runs for
every command test already, so if something fails the other tests will
notice.

What can change is configuration. Without a test config the defaults apply;
a test config overrides them; FBIHARM_* environment variables override
both. The commands must also all be registered on app.cli.

'''

from fbiharm import create_app


def test_config():
    assert not create_app().testing
    assert create_app({'TESTING': True}).testing


def test_defaults():
    config = create_app({'TESTING': True}).config
    assert config['TOLERANCE'] == 1e-5
    assert config['INVERSION_TOLERANCE'] == 1e-4
    assert config['FD_STEP'] == 1e-3
    assert config['SEED'] == 42
    assert config['FORMAT'] == 'json'


def test_env_overrides(monkeypatch):
    monkeypatch.setenv('FBIHARM_SEED', '7')
    monkeypatch.setenv('FBIHARM_TOLERANCE', '1e-6')
    config = create_app({'TESTING': True, 'SEED': 3}).config
    assert config['SEED'] == 7
    assert config['TOLERANCE'] == 1e-6


def test_log_level():
    app = create_app({'TESTING': True, 'LOG_LEVEL': 'DEBUG'})
    assert app.logger.name == 'fbiharm'
    assert app.logger.level == 10


def test_commands_registered(app):
    names = set(app.cli.list_commands(None))
    assert {'verify-inversion', 'classify-inversion', 'curve-export', 'solve-1d',
            'verify-suite'} <= names
