from django.contrib import messages
from django.contrib.auth.decorators import user_passes_test
from django.http import JsonResponse
from django.shortcuts import get_object_or_404, redirect, render

from .models import EvaluationRun


def is_admin(user):
    return user.is_authenticated and user.is_staff


def run_list(request):
    """Recorded runs, newest first; ``?sequence=`` and ``?mode=`` narrow the list."""
    runs = EvaluationRun.objects.all()
    sequence = request.GET.get('sequence')
    mode = request.GET.get('mode')
    if sequence:
        runs = runs.filter(sequence__icontains=sequence)
    if mode:
        runs = runs.filter(mode=mode)
    return render(request, 'tracking/run_list.html', {'runs': runs, 'sequence': sequence or '', 'mode': mode or ''})


def run_detail(request, pk):
    run = get_object_or_404(EvaluationRun, pk=pk)
    frames = run.frames.all()
    return render(request, 'tracking/run_detail.html', {
        'run': run,
        'frames': frames,
        'failure_frames': run.failure_frames,
    })


def run_summary(request, pk):
    run = get_object_or_404(EvaluationRun, pk=pk)
    return JsonResponse(run.summary())


@user_passes_test(is_admin)
def run_delete(request, pk):
    run = get_object_or_404(EvaluationRun, pk=pk)
    if request.method == 'POST':
        if run.preview:
            run.preview.delete(save=False)
        run.delete()
        messages.success(request, 'Run deleted.')
        return redirect('run_list')
    return render(request, 'tracking/run_confirm_delete.html', {'run': run})
