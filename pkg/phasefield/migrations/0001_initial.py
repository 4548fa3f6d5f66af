# Generated by Django 5.2.5

import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(help_text='Management command that ran', max_length=50)),
                ('config_path', models.CharField(blank=True, help_text='Run-config file, if any', max_length=500)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('status', models.CharField(choices=[('RUNNING', 'Running'), ('COMPLETED', 'Completed'), ('FAILED', 'Failed')], default='RUNNING', max_length=20)),
                ('started_at', models.DateTimeField(default=django.utils.timezone.now)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('steps_completed', models.IntegerField(default=0)),
                ('final_time', models.FloatField(blank=True, null=True)),
                ('mass_drift', models.FloatField(blank=True, help_text='Relative drift of the conserved mass', null=True)),
                ('message', models.TextField(blank=True)),
            ],
            options={
                'verbose_name': 'Simulation Run',
                'verbose_name_plural': 'Simulation Runs',
                'ordering': ['-started_at'],
                'indexes': [models.Index(fields=['command', '-started_at'], name='run_command_started_idx'), models.Index(fields=['status'], name='run_status_idx')],
            },
        ),
    ]
