from setuptools import setup, find_packages

with open("README.md") as fh:
    description = fh.read()

setup(
    name="pdfw",
    version="0.1.0",
    packages=find_packages(include=["pdfw", "pdfw.*"]),
    description="PDFW: primal-dual Frank-Wolfe for constrained stochastic programs over time averages",
    long_description=description,
    long_description_content_type="text/markdown",
    python_requires=">=3.8",
    install_requires=["numpy", "pandas", "pyyaml", "scipy", "networkx"],
    extras_require={"test": ["pytest", "hypothesis"]},
    package_data={"pdfw": ["inputdata/config/*.yaml", "inputdata/instances/*.yaml"]},
    include_package_data=True,
    entry_points={"console_scripts": ["pdfw = pdfw.harness.cli:main"]},
)
