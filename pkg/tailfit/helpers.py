# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import logging

PACKAGE_LOGGER = "tailfit"


class Logger(object):
    """
    Thin wrapper around a named stdlib logger with a console handler attached.

    Module loggers are children of the ``tailfit`` logger, so ``configure``
    can retune every console handler and add one shared file handler.
    """
    _instances = []

    def __init__(self, name, level=logging.DEBUG, filename=None):
        if not name.startswith(PACKAGE_LOGGER):
            name = "{}.{}".format(PACKAGE_LOGGER, name)
        self.instance = logging.getLogger(name)
        self.instance.setLevel(level)
        self.instance.propagate = False
        self._console = None
        self.set_console_handler()
        if filename:
            self.set_file_handler(filename)
        Logger._instances.append(self)

    def set_console_handler(self, level=logging.WARNING):
        if self._console is not None:
            self._console.setLevel(level)
            return
        handler = logging.StreamHandler()
        handler.setLevel(level)
        formatter = logging.Formatter(
            '[%(asctime)s] %(levelname)-8s %(message)s',
            '%H:%M:%S'
        )
        handler.setFormatter(formatter)
        self.instance.addHandler(handler)
        self._console = handler

    def set_file_handler(self, filename, level=logging.DEBUG):
        handler = Logger.file_handler(filename, level)
        self.instance.addHandler(handler)
        return handler

    @staticmethod
    def file_handler(filename, level=logging.DEBUG):
        handler = logging.FileHandler(filename)
        handler.setLevel(level)
        formatter = logging.Formatter(
            '[%(asctime)s] %(name)-24s: %(levelname)-8s %(message)s',
            '%Y-%m-%d %H:%M:%S'
        )
        handler.setFormatter(formatter)
        return handler

    @classmethod
    def configure(cls, verbosity=0, filename=None):
        """
        Set console verbosity for all package loggers (0 warning, 1 info, 2+ debug)
        and optionally mirror everything into ``filename``.

        Returns the shared file handler, if one was created, so the caller can close it.
        """
        level = logging.WARNING
        if verbosity == 1:
            level = logging.INFO
        elif verbosity >= 2:
            level = logging.DEBUG
        handler = cls.file_handler(filename) if filename else None
        for logger in cls._instances:
            logger.set_console_handler(level)
            if handler is not None:
                logger.instance.addHandler(handler)
        return handler

    @classmethod
    def release(cls, handler):
        for logger in cls._instances:
            logger.instance.removeHandler(handler)
        handler.close()

    def info(self, message, *args):
        self.instance.info(message, *args)

    def debug(self, message, *args):
        self.instance.debug(message, *args)

    def warning(self, message, *args):
        self.instance.warning(message, *args)

    def error(self, message, *args):
        self.instance.error(message, *args)
