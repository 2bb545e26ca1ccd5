from resilsim.utilities.default_n_proc import get_allowed_n_proc

default_num_processes = get_allowed_n_proc()

# attention quality law. q_occ = max(q_floor, 1 - k * (rho - 1)) for rho > 1
DEFAULT_QUALITY_K = 0.5
DEFAULT_QUALITY_FLOOR = 0.25
# interpolation between nominal and degraded transition probabilities is quadratic in q. Not configurable
QUALITY_EXPONENT = 2
# days over which arrival rate and mean service time are averaged for the utilization rate
DEFAULT_UTILIZATION_WINDOW = 7

# qualitative vulnerability classes of IT nodes mapped to the success probability of an attack at threat level 1
DEFAULT_VULNERABILITY_CLASSES = {'low': 0.1, 'medium': 0.5, 'high': 0.9}
# daily probability that a botnet-infected node infects each of its graph neighbours
DEFAULT_P_SPREAD = 0.1
# ddos load up to capacity * absorb factor only degrades a node, beyond that it goes down
DEFAULT_DDOS_ABSORB_FACTOR = 1.5
# q_own of a node in degraded state when nothing else defines it
DEFAULT_DEGRADED_QUALITY = 0.5

# per day incidence is expressed per this many inhabitants
INCIDENCE_BASE = 100000

SCHEMA_VERSION = 1
