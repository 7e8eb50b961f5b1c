import json
import logging
import logging.config
import os
import pathlib

from elaine_embed.env import Env


def setup_logging(level: str = "INFO"):
    config_path = pathlib.Path(__file__).with_name("logging-config.json")
    with open(config_path) as f:
        config = json.load(f)

    os.makedirs(Env.LOG_DIR, exist_ok=True)
    config["handlers"]["file"]["filename"] = os.path.join(Env.LOG_DIR, "elaine.log")
    config["handlers"]["stderr"]["level"] = level.upper()

    logging.config.dictConfig(config)


logger = logging.getLogger("app")
