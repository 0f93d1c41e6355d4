"""
Setup configuration for the selfsim package.
"""

from setuptools import setup, find_packages
import os

# Read README for long description
with open(os.path.join(os.path.dirname(__file__), "README.md"), encoding="utf-8") as f:
    long_description = f.read()

requirements = [
    "numpy>=1.21",
    "jsonschema>=4.0",
]

setup(
    name="selfsim_geometry",
    version="0.1.0",
    description="Complementary self-similarity constants, rasters and homotopy classification for IFS fractals",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=requirements,
    extras_require={
        "dev": [
            "pytest>=6.0",
            "pytest-cov",
            "hypothesis>=6.0",
            "black",
            "flake8",
            "mypy",
        ],
    },
    entry_points={
        "console_scripts": [
            "selfsim=selfsim.cli:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
