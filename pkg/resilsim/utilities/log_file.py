import sys
from datetime import datetime
from time import sleep
from typing import Optional

# Monte Carlo workers and the cli share one log file per command
WRITE_ATTEMPTS = 5
RETRY_WAIT_S = 0.5


def print_to_log_file(log_file: Optional[str], *args, also_print_to_console: bool = True,
                      add_timestamp: bool = True) -> bool:
    """
    Appends one line (args joined by spaces) to log_file and echoes it to stdout. log_file None only prints.
    Returns False if the line could not be written after WRITE_ATTEMPTS tries
    """
    if add_timestamp:
        args = (f'{datetime.now()}:', *args)
    line = ' '.join(str(a) for a in args)

    written = log_file is None
    for _ in range(WRITE_ATTEMPTS if log_file is not None else 0):
        try:
            with open(log_file, 'a+') as f:
                f.write(line + '\n')
            written = True
            break
        except OSError:
            print(f'{datetime.now()}: failed to log to {log_file}:', sys.exc_info()[1], file=sys.stderr)
            sleep(RETRY_WAIT_S)
    if also_print_to_console:
        print(line)
    return written
