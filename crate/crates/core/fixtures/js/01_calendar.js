function moveEvent(eventName, newDate) {
  const event = calendar.getEvents().find((e) => e.title === eventName);
  event.setStart(newDate);
}
