import logging

from django.db import DatabaseError, models
from django.utils import timezone

logger = logging.getLogger(__name__)


class SimulationRun(models.Model):
    """
    Ledger entry for one management-command execution.

    Ledger writes are best-effort: when the database is missing or not
    migrated the run goes on and a warning is logged.
    """
    STATUS_CHOICES = [
        ('RUNNING', 'Running'),
        ('COMPLETED', 'Completed'),
        ('FAILED', 'Failed'),
    ]

    command = models.CharField(max_length=50, help_text="Management command that ran")
    config_path = models.CharField(max_length=500, blank=True, help_text="Run-config file, if any")
    output_dir = models.CharField(max_length=500, blank=True)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='RUNNING')
    started_at = models.DateTimeField(default=timezone.now)
    finished_at = models.DateTimeField(null=True, blank=True)
    steps_completed = models.IntegerField(default=0)
    final_time = models.FloatField(null=True, blank=True)
    mass_drift = models.FloatField(null=True, blank=True, help_text="Relative drift of the conserved mass")
    message = models.TextField(blank=True)

    class Meta:
        ordering = ['-started_at']
        indexes = [
            models.Index(fields=['command', '-started_at'], name='run_command_started_idx'),
            models.Index(fields=['status'], name='run_status_idx'),
        ]
        verbose_name = 'Simulation Run'
        verbose_name_plural = 'Simulation Runs'

    def __str__(self):
        return f"{self.command} - {self.get_status_display()} - {self.started_at.strftime('%Y-%m-%d %H:%M')}"

    @classmethod
    def start(cls, command, config_path='', output_dir=''):
        """Open a RUNNING entry; returns ``None`` when the ledger is unavailable."""
        try:
            return cls.objects.create(command=command, config_path=str(config_path or ''),
                                      output_dir=str(output_dir or ''))
        except DatabaseError as exc:
            logger.warning(f"Run ledger unavailable, {command} is not recorded: {exc}")
            return None

    @classmethod
    def recent(cls, limit=10, command=None):
        runs = cls.objects.all()
        if command:
            runs = runs.filter(command=command)
        return runs[:limit]

    def _finish(self, status, message, **fields):
        self.status = status
        self.finished_at = timezone.now()
        self.message = message
        for name, value in fields.items():
            if value is not None:
                setattr(self, name, value)
        try:
            self.save()
        except DatabaseError as exc:
            logger.warning(f"Could not update ledger entry {self.pk}: {exc}")

    def mark_completed(self, steps_completed=None, final_time=None, mass_drift=None, message=''):
        self._finish('COMPLETED', message, steps_completed=steps_completed,
                     final_time=final_time, mass_drift=mass_drift)

    def mark_failed(self, message, steps_completed=None, final_time=None):
        self._finish('FAILED', message, steps_completed=steps_completed, final_time=final_time)

    @property
    def duration(self):
        if self.finished_at is None:
            return None
        return (self.finished_at - self.started_at).total_seconds()
