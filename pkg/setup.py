from setuptools import setup, find_packages

setup(
    name="toda_ward_lab",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.22.0",
        "pandas>=1.4.0",
        "scipy>=1.8.0",
        "sympy>=1.10",
        "python-dotenv>=1.0.0",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "toda-ward-lab=toda_ward_lab.cli:main",
        ],
    },
    author="Moon Whales",
    author_email="your.email@example.com",
    description="Exact and Monte Carlo verification of Ward identities in sl3 boundary Toda field theory",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.8",
)
