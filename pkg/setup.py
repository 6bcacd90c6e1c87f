from setuptools import setup, find_packages

setup(
    name='genlearn',
    version='0.1.0',
    python_requires='>=3.8',
    package_dir={'': 'src'},
    packages=find_packages('src'),
    zip_safe=False,
    install_requires=['numpy', 'pandas>=1.5', 'scipy'],
    extras_require={'plot': ['matplotlib'], 'test': ['pytest']},
    entry_points={'console_scripts': ['genlearn = genlearn.cli.main:main']},
    author='',
    author_email='',
    description='Generative learning: divergences, autoregressive models, mixtures, VAEs, diffusion, GANs and score matching',
    license='Apache License Version 2.0',
    keywords='generative models divergences diffusion gan vae',
)
