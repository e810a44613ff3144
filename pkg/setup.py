import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "spinest._ckernels",
        ["src/spinest/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3),
)
