try:
    from dotenv import load_dotenv

    _ = load_dotenv()
except ImportError:
    pass

import os


class Env:
    LOG_DIR = os.environ.get("ELAINE_LOG_DIR", "logs")
    CACHE_DIR = os.environ.get("ELAINE_CACHE_DIR") or None
    """Directory for cached similarity matrices; unset disables the cache"""

    JOBS = int(os.environ.get("ELAINE_JOBS") or os.cpu_count() or 1)
