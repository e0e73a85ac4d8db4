#!/usr/bin/env python

try:
    import pypandoc
    long_description = pypandoc.convert('README.md', 'rst')
except(IOError, ImportError):
    long_description = open('README.md').read()

from setuptools import setup, find_packages
setup(
    name="pyhqcp",
    version="1.0.0",
    packages=find_packages(exclude=['tests']),
    scripts=['pyhqcp'],
    install_requires=['numpy>=1.17', 'scipy>=1.3'],

    # metadata for upload to PyPI
    description="Robust orthogonal CP tensor approximation with Cauchy loss",
    long_description=long_description,
    license="MIT",
    keywords="tensor CP decomposition robust ADMM half-quadratic video",
)
