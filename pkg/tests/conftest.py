"""Expose pytest's capture manager so acceptance-criterion report lines
reach the terminal even under the default fd-level capture."""

capture_manager = None


def pytest_configure(config):
    global capture_manager
    capture_manager = config.pluginmanager.getplugin("capturemanager")
