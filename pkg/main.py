import sys

from modules.settings_manager import SettingsManager
from ui.cli import execute, log_level, parse_args
from utils.log_setup import setup_logging


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parse_args(argv)
    settings = SettingsManager(args.settings)
    setup_logging(log_level(args, settings), settings.log_file())
    return execute(args, settings, argv)


if __name__ == "__main__":
    sys.exit(main())
