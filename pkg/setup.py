from setuptools import find_packages, setup

with open("requirements.txt") as file:
    requirements = [
        line.strip() for line in file
        if line.strip() and not line.startswith("#") and not line.startswith(("pytest", "black", "flake8"))
    ]

setup(
    name="tor-hilbert",
    version="0.1.0",
    description="Bivariate Hilbert functions of Tor modules and checks of their polynomial behaviour",
    packages=find_packages(include=["src", "src.*"]),
    py_modules=["main"],
    install_requires=requirements,
    python_requires=">=3.9",
    entry_points={"console_scripts": ["torhilb=main:main"]},
)
