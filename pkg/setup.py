import setuptools
from distutils.util import convert_path

with open("README.md", "r") as fh:
    long_description = fh.read()

main_ns = {}
ver_path = convert_path('fdmderham/version.py')
with open(ver_path) as ver_file:
    exec(ver_file.read(), main_ns)

setuptools.setup(
    name='fdmderham',
    version=main_ns['__version__'],
    description='Fast diagonalization preconditioners for de Rham complexes on hexahedral meshes',
    python_requires='>=3.8',
    long_description=long_description,
    long_description_content_type="text/markdown",
    license='GPLv3+',

    # What does your project relate to?
    keywords=['finite elements', 'preconditioning', 'de rham', 'sparse', 'multigrid'],

    packages=setuptools.find_packages(exclude=['tests', 'tests.*']),
    package_data={'fdmderham': ['templates/*.j2']},

    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'jinja2',
    ],
    entry_points={
        'console_scripts': ['fdmderham=fdmderham.cli:main'],
    },
)
