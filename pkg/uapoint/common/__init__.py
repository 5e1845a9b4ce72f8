"""Common utilities and configurations for uapoint."""
