from ._polygrad import *  # noqa: F401,F403
