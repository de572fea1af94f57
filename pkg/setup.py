#!/usr/bin/env python3

from setuptools import setup, find_packages

with open("README.md", "r") as fh:
    long_description = fh.read()

with open("requirements.txt", "r") as f:
    requirements = [line for line in f.read().splitlines()
                    if line.strip() and not line.startswith("#")]

setup(
    name="cairn-check",
    version="0.3.0",
    author="thinko",
    author_email="ahandy@gmail.com",
    description="Computational checks for free-group intervals, cairns and the Kazhdan bound",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="https://github.com/thinko/cairn-check",
    packages=find_packages(include=["library", "scripts"]),
    package_data={"scripts": ["templates/*.html"]},
    include_package_data=True,
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    scripts=[
        "check-cairn.sh",
    ],
    entry_points={
        "console_scripts": [
            "cairn-check=scripts.cairn_check:run",
        ],
    },
)
