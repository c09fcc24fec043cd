import os
from setuptools import setup, find_packages


def read(fname):
    with open(os.path.join(os.path.dirname(__file__), fname)) as fin:
        return fin.read()


setup(
    name='coulomb',
    version='0.1.0',
    description='Large-deviations outage analysis of MIMO mutual information',
    license='MIT',
    packages=find_packages(exclude=['tests']),
    long_description=read('README.md'),
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.6',
        'rply>=0.7.2',
    ],
    entry_points={
        'console_scripts': [
            'coulomb = coulomb.cli:main',
        ],
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
)
