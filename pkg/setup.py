"""
Setup script for the PA workbench
"""

from setuptools import setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="pa-workbench",
    version="1.0.0",
    description="Truly concurrent process algebra workbench: SOS, bisimulations, axiom normal forms",
    long_description=long_description,
    long_description_content_type="text/markdown",
    py_modules=[
        "pa_syntax",
        "pa_settings",
        "pa_semantics",
        "pa_pomsets",
        "pa_equivalence",
        "pa_axioms",
        "pa_enumeration",
        "pa_harness",
        "pa_workbench",
    ],
    data_files=[
        ("configs", ["configs/cfg0.conf", "configs/cfg_empty.conf"]),
        ("schemas", ["schemas/verdict.schema.json", "schemas/lts.schema.json",
                     "schemas/report.schema.json"]),
    ],
    classifiers=[
        "Development Status :: 4 - Beta",
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
        "test": ["pytest>=7.0", "hypothesis>=6.0", "jsonschema>=4.0"],
    },
    entry_points={
        "console_scripts": [
            "pa=pa_workbench:main",
        ],
    },
    keywords="process algebra, bisimulation, true concurrency, pomsets, term rewriting",
)
