"""
Runtime state, config files and run manifests
"""
from molforge.utils.config_file import build_config, read_config_file
from molforge.utils.manifest import MANIFEST_FILE, Manifest, file_sha256
from molforge.utils.session_handler import THREADS_ENV, State, get_thread_cap, logger_with_settings
