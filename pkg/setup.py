from importlib.machinery import SourceFileLoader

import toml
from setuptools import find_packages, setup

version = SourceFileLoader("__version__", "freqprint/__init__.py").load_module()

project = toml.load("pyproject.toml")["project"]

setup(
    name=project["name"],
    version=str(version.__version__),
    classifiers=project["classifiers"],
    author=project["authors"][0]["name"],
    packages=find_packages(include=["freqprint", "freqprint.*"]),
    install_requires=project["dependencies"],
    entry_points={"console_scripts": [f"{name}={target}" for name, target in project["scripts"].items()]},
    description=project["description"],
    long_description=project["readme"],
    python_requires=project["requires-python"],
)
