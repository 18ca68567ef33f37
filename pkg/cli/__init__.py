from .manifest import RunManifest, __version__
from .config import RunConfig, build_parser, parse_config
from .commands import execute
