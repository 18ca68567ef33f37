import logging
import sys
from typing import Optional, Sequence

from cli import execute, parse_config
from pipeline_steps.custom_exception import UsageError

LOG_FORMAT = "%(asctime)s %(levelname)s %(message)s"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(exc.message, file=sys.stderr)
        return exc.exit_code

    logging.basicConfig(level=cfg.log_level, format=LOG_FORMAT)
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
