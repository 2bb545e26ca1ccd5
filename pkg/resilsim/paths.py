import os

"""
PLEASE READ documentation/set_environment_variables.md FOR INFORMATION ON HOW TO SET THIS UP
"""

resilsim_results = os.environ.get('resilsim_results')
