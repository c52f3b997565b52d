'''

This is the application factory

This __init__.py serves double duty: it contains the application factory,
and it tells Python that the fbiharm directory should be treated as a
package. There are no views; the app exists to carry configuration and the
command line. Every verification is a click command registered on app.cli,
so `fbiharm verify-suite` and `flask --app fbiharm verify-suite` run the same
thing.

Configuration is layered. from_mapping sets the defaults, the instance
folder's config.py overrides them when it exists (and no test config was
passed), and from_prefixed_env lets FBIHARM_SEED=7 or FBIHARM_TOLERANCE=1e-6
override both. Flags given to a command win over everything.

The Flask logger is named after the import name, so app.logger is the
'fbiharm' logger itself and the numerical modules, which log through
logging.getLogger(__name__), inherit its level.

'''

import os

from flask import Flask


def create_app(test_config=None):
    # create and configure the app
    app = Flask(__name__, instance_relative_config=True)
    app.config.from_mapping(
        TOLERANCE=1e-5,
        INVERSION_TOLERANCE=1e-4,
        FD_STEP=1e-3,
        SEED=42,
        FORMAT='json',
        OUTPUT=None,
        WORKERS=1,
        LOG_LEVEL='WARNING',
    )

    if test_config is None:
        # load the instance config, if it exists, when not testing
        app.config.from_pyfile('config.py', silent=True)
    else:
        # load the test config if passed in
        app.config.from_mapping(test_config)

    app.config.from_prefixed_env('FBIHARM')
    app.logger.setLevel(app.config['LOG_LEVEL'])

    # ensure the instance folder exists
    try:
        os.makedirs(app.instance_path)
    except OSError:
        pass

    from . import cli
    cli.init_app(app)

    return app
