"""Run the service: python -m nli_service [--config file.json]."""

import argparse

import uvicorn

from .app import create_app
from .config import load_config


def main(argv=None):
    parser = argparse.ArgumentParser(prog="nli-service")
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--host", default="0.0.0.0")
    parser.add_argument("--port", type=int, default=None, help="overrides the configured port")
    args = parser.parse_args(argv)

    config = load_config(args.config)
    port = args.port if args.port is not None else config.port
    uvicorn.run(create_app(config), host=args.host, port=port)


if __name__ == "__main__":
    main()
