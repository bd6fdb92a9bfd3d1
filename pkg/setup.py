import os

from setuptools import find_packages, setup

LONG_DESC = """Grid-level checks of the measure estimate, doubling, L-epsilon, \
Holder and Harnack estimates for elliptic equations that hold only where the gradient is large"""


def local_path():
    filename = os.path.abspath(__file__)
    local_path = os.path.dirname(filename)
    return local_path


def readme():
    with open(os.path.join(local_path(), 'README.md')) as f:
        return f.read()


def requirements():
    return ['numpy', 'scipy', 'matplotlib']


setup(
    name='cusplab',
    description='Numerical lab for degenerate elliptic regularity estimates',
    long_description=LONG_DESC,
    keywords='pucci viscosity harnack holder elliptic numerical',
    license='MIT',
    version='0.1.0',
    platforms='Windows MacOS POSIX',
    packages=find_packages(exclude=["tests"]),
    package_data={'cusplab': ['default.cfg']},
    include_package_data=True,
    zip_safe=False,
    install_requires=requirements(),
    extras_require={
        'tests': ['pytest', 'coverage']
    },
    entry_points={
        'console_scripts': [
            'cusplab-cli=cusplab.cli:main'
        ]
    },
    classifiers=[
        'Operating System :: MacOS :: MacOS X',
        'Operating System :: Microsoft :: Windows',
        'Operating System :: POSIX',
        'Programming Language :: Python',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
    ]
)
