import logging
import os

_configured = False


def env_flag(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    return raw.strip().lower() not in ("0", "false", "no", "off")


def setup_logging(level: str | None = None, json_logs: bool | None = None) -> None:
    """Install one stream handler on the root logger (idempotent)."""
    global _configured
    level_name = (level or os.getenv("KGRAM_LOG_LEVEL", "INFO")).upper()
    json_logs = env_flag("KGRAM_JSON_LOGS", True) if json_logs is None else json_logs
    root = logging.getLogger()
    root.setLevel(getattr(logging, level_name, logging.INFO))
    if _configured:
        return

    formatter = None
    if json_logs:
        try:
            try:
                from pythonjsonlogger.json import JsonFormatter
            except ImportError:
                from pythonjsonlogger.jsonlogger import JsonFormatter
            formatter = JsonFormatter(
                fmt='%(asctime)s %(name)s %(levelname)s %(message)s',
                datefmt='%Y-%m-%dT%H:%M:%S')
        except ImportError:
            pass
    if formatter is not None:
        handler = logging.StreamHandler()
        handler.setFormatter(formatter)
        root.addHandler(handler)
    else:
        logging.basicConfig(level=root.level, format='%(asctime)s %(name)s %(levelname)s %(message)s')

    try:
        import sentry_sdk
        dsn = os.environ.get('SENTRY_DSN', '')
        if dsn:
            sentry_sdk.init(dsn=dsn, traces_sample_rate=0.0)
            logging.getLogger("logging_setup").info("[LOG] Sentry error reporting enabled")
    except ImportError:
        pass

    _configured = True
