import os

from setuptools import Extension, setup


def ext_modules():
    if os.environ.get("AMORTRS_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    extensions = [
        Extension(
            "amortrs.engine._kernel",
            ["src/amortrs/engine/_kernel.pyx"],
            extra_compile_args=["-O3"],
            optional=True,
        )
    ]
    return cythonize(extensions, compiler_directives={"language_level": "3"})


setup(ext_modules=ext_modules())
