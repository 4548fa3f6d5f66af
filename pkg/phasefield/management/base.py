import logging

from django.core.management.base import BaseCommand, CommandError

from phasefield.config import load_config
from phasefield.exceptions import PhaseFieldError
from phasefield.models import SimulationRun

logger = logging.getLogger('phasefield.commands')

IO_EXIT_CODE = 3


class PhaseFieldCommand(BaseCommand):
    """
    Shared plumbing for the solver commands.

    Subclasses implement ``perform(**options)`` and return the keyword
    arguments for ``SimulationRun.mark_completed``. Errors become a
    ``CommandError`` whose message starts with the error code and whose
    return code is the exit status of the error class.
    """

    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def load(self, path):
        return load_config(path)

    def handle(self, *args, **options):
        name = self.command_name()
        run = SimulationRun.start(name, config_path=options.get('config') or '',
                                  output_dir=options.get('out') or '')
        try:
            outcome = self.perform(**options) or {}
        except PhaseFieldError as exc:
            self._fail(run, name, exc.code, exc, exc.exit_code)
        except OSError as exc:
            self._fail(run, name, 'io_error', exc, IO_EXIT_CODE)
        except CommandError as exc:
            if run is not None:
                run.mark_failed(str(exc))
            raise
        if run is not None:
            run.mark_completed(**outcome)

    def _fail(self, run, name, code, exc, exit_code):
        logger.error(f"{name} failed ({code}): {exc}")
        if run is not None:
            run.mark_failed(f"{code}: {exc}")
        raise CommandError(f"{code}: {exc}", returncode=exit_code) from exc

    def perform(self, **options):
        raise NotImplementedError
