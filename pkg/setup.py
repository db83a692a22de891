from setuptools import find_packages, setup

setup(
    name="gfscma",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "numpy>=1.21.0",
        "scipy>=1.11.0",
        "pandas>=1.5.0",
        "networkx>=3.0",
        "pydantic>=2.0.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "black>=22.0.0",
            "pylint>=2.14.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "gfscma=gfscma.cli:main",
        ],
    },
    python_requires=">=3.9",
    description="Success probability, area spectral efficiency and symbol error rate of "
                "grant-free SCMA in Poisson IoT networks",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    keywords="scma, grant-free, stochastic geometry, poisson point process, iot",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering",
        "Programming Language :: Python :: 3.9",
    ],
)
