import os


def get_allowed_n_proc() -> int:
    """
    Number of worker processes used for Monte Carlo batches.

    IMPORTANT: if the environment variable RESILSIM_THREADS is set it will overwrite anything in this function.

    Without it we use the number of CPUs, capped at 8. A single run is strictly single threaded, so more workers than
    runs are never started anyway (see run_montecarlo).
    """
    if 'RESILSIM_THREADS' in os.environ.keys():
        try:
            use_this = int(os.environ['RESILSIM_THREADS'])
        except ValueError:
            raise RuntimeError(f"RESILSIM_THREADS must be an integer, got '{os.environ['RESILSIM_THREADS']}'")
    else:
        use_this = 8

    cpus = os.cpu_count() or 1
    use_this = max(1, min(use_this, cpus))
    return use_this
