from setuptools import setup, find_namespace_packages

setup(name='resilsim',
      packages=find_namespace_packages(include=["resilsim", "resilsim.*"]),
      package_data={'resilsim': ['scenarios/*.json']},
      version='1.0.0',
      description='Agent-based simulator of healthcare systems under epidemics, mass casualty incidents and cyber '
                  'attacks on their IT infrastructure, with Monte Carlo contingency matrices.',
      license='Apache License Version 2.0, January 2004',
      python_requires=">=3.9",
      install_requires=[
          "numpy",
          "pandas",
          "networkx>=2.6",
          "tabulate",
          "tqdm",
          "batchgenerators>=0.25",
      ],
      extras_require={
          'test': ["pytest", "scipy"],
      },
      entry_points={
          'console_scripts': [
              'resilsim = resilsim.run.cli:cli_entry',  # validate / simulate / matrix
          ],
      },
      keywords=['agent-based simulation', 'healthcare resilience', 'epidemics', 'SIR', 'cyber security',
                'critical infrastructure', 'Monte Carlo', 'contingency planning']
      )
