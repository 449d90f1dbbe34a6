import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# -ffp-contract=off keeps the compiled pivot arithmetic bit-identical to the
# numpy fallback (no fused multiply-add), so results do not depend on which
# kernel is installed.
extensions = [
    Extension(
        "mapbnb._simplex_c",
        ["src/mapbnb/_simplex_c.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=(
        cythonize(extensions, compiler_directives={"language_level": "3"})
        if cythonize is not None
        else []
    )
)
