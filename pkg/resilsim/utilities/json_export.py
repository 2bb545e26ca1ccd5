from collections.abc import Iterable

import numpy as np


def recursive_fix_for_json_export(my_dict: dict):
    # json does not know numpy scalars/arrays or enums. Scenario dicts are built from both, so we clean them in place
    keys = list(my_dict.keys())  # cannot iterate over keys() if we change keys....
    for k in keys:
        if isinstance(k, (np.integer, np.bool_)) or hasattr(k, 'value') and not isinstance(k, str):
            tmp = my_dict[k]
            del my_dict[k]
            k = _fix_scalar(k)
            my_dict[k] = tmp

        if isinstance(my_dict[k], dict):
            recursive_fix_for_json_export(my_dict[k])
        elif isinstance(my_dict[k], np.ndarray):
            assert len(my_dict[k].shape) == 1, 'only 1d arrays are supported'
            my_dict[k] = fix_types_iterable(my_dict[k], output_type=list)
        elif isinstance(my_dict[k], (list, tuple)):
            my_dict[k] = fix_types_iterable(my_dict[k], output_type=list)
        else:
            my_dict[k] = _fix_scalar(my_dict[k])


def _fix_scalar(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, str):
        return value
    # enums (HealthState, CareLevel, AttackKind) are exported by name
    if hasattr(value, 'name') and hasattr(value, 'value'):
        return value.name if not isinstance(value.value, str) else value.value
    return value


def fix_types_iterable(iterable, output_type):
    out = []
    for i in iterable:
        if isinstance(i, dict):
            recursive_fix_for_json_export(i)
            out.append(i)
        elif isinstance(i, str):
            out.append(i)
        elif isinstance(i, np.ndarray) or (isinstance(i, Iterable) and not hasattr(i, 'value')):
            out.append(fix_types_iterable(i, list))
        else:
            out.append(_fix_scalar(i))
    return output_type(out)
