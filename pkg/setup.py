from setuptools import setup, find_packages

setup(
    name="polyfix",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["orchestrator"],
    install_requires=[
        "numpy>=1.24,<3.0",
        "scipy~=1.10",
        "PyYAML~=6.0",
        "python-dotenv~=1.0.0",
    ],
    extras_require={
        "test": ["pytest~=8.0", "hypothesis~=6.90"],
    },
    entry_points={
        "console_scripts": ["polyfix=orchestrator:run"],
    },
    python_requires="~=3.9",
    description=(
        "Fixed points and periodic orbits of nonexpansive maps under polyhedral norms"
    ),
    author="",
    author_email="",
)
