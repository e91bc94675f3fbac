import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="eigenres",
    version="0.0.0.dev0",
    author="The eigenres Development Team",
    description="Eigenresidual excitation modelling of speech: LPC analysis, "
                "GCI detection, PCA of residual frames and a vocoder",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.7",
    install_requires=[
        "numpy",
        "scipy",
        "matplotlib",
    ],
    entry_points={
        "console_scripts": ["eigenres=eigenres.cli:main"],
    },
)
