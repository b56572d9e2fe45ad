"""Set up the feller_lending package."""
import json
from pathlib import Path

from setuptools import find_packages, setup

DESCRIPTION = (
    "Nash equilibria, Monte Carlo simulation and systemic-risk analytics "
    "for interbank lending on coupled Feller diffusions."
)
ROOT_DIR = Path(__file__).parent.resolve()
README_FILE = ROOT_DIR / "README.md"
LONG_DESCRIPTION = README_FILE.read_text(encoding="utf-8")
VERSION_FILE = ROOT_DIR / "feller_lending" / "VERSION"
VERSION = json.loads(VERSION_FILE.read_text())["version"]

REQUIRES = [
    "jinja2",
    "numpy",
    "pathvalidate",
    "pydantic>=1.10,<2",
    "python-dotenv",
    "scipy>=1.6",
    "typing_extensions",
]


setup(
    name="feller-lending",
    version=VERSION,
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    package_data={"feller_lending": ["VERSION", "templates/*.jinja2"]},
    zip_safe=False,
    license="MIT",
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    python_requires=">=3.8",
    install_requires=REQUIRES,
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    entry_points={"console_scripts": ["feller-lending = feller_lending.cli:main"]},
)
