'''

The setup.py file describes the project and the files that belong to it.

packages tells Python what package directories (and the Python files they
contain) to include. find_packages() finds these directories automatically so
you don't have to type them out. The numerical stack (numpy, scipy) and Flask,
which carries the configuration and the click command line, are the runtime
requirements; the test extra adds pytest and hypothesis.

entry_points exposes the FlaskGroup in fbiharm.cli as the `fbiharm` command,
so the verifications run without setting FLASK_APP.

'''

from setuptools import find_packages, setup

setup(
    name='fbiharm',
    version='1.0.0',
    packages=find_packages(exclude=['tests']),
    include_package_data=True,
    zip_safe=False,
    python_requires='>=3.9',
    install_requires=[
        'flask>=2.2',
        'numpy>=1.22',
        'scipy>=1.12',
    ],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    entry_points={
        'console_scripts': ['fbiharm = fbiharm.cli:main'],
    },
)
